#ifndef FDDE_FDDE_HPP
#define FDDE_FDDE_HPP

#include "fdde/basis.hpp"
#include "fdde/caputo.hpp"
#include "fdde/collocation.hpp"
#include "fdde/expr.hpp"
#include "fdde/gamma.hpp"
#include "fdde/problems.hpp"
#include "fdde/quadrature.hpp"
#include "fdde/runner.hpp"
#include "fdde/stepper.hpp"

#endif
