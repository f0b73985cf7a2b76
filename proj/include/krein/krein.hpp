#pragma once

#include "krein/assignment.hpp"
#include "krein/circlefn.hpp"
#include "krein/doi.hpp"
#include "krein/error.hpp"
#include "krein/flowderiv.hpp"
#include "krein/multiplier.hpp"
#include "krein/spectra.hpp"
#include "krein/ssf.hpp"
