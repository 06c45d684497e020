#pragma once

#include "persym/census.hpp"
#include "persym/closed_forms.hpp"
#include "persym/coeff_extract.hpp"
#include "persym/errors.hpp"
#include "persym/exact.hpp"
#include "persym/gf2.hpp"
#include "persym/polynomial.hpp"
#include "persym/verifier.hpp"
