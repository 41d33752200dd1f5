#ifndef GRUSHIN_GRUSHIN_HPP
#define GRUSHIN_GRUSHIN_HPP

#include "core.hpp"
#include "hermite.hpp"
#include "diffops.hpp"
#include "expansion.hpp"
#include "multipliers.hpp"
#include "geometry.hpp"
#include "quadrature.hpp"
#include "kernel.hpp"
#include "grid_oracle.hpp"
#include "estimates.hpp"
#include "suites.hpp"
#include "report.hpp"
#include "run.hpp"

#endif // GRUSHIN_GRUSHIN_HPP
