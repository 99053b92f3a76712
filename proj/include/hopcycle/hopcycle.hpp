#pragma once

#include "error.hpp"
#include "rational.hpp"
#include "patterns.hpp"
#include "ratlinalg.hpp"
#include "cyclo.hpp"
#include "dynamics.hpp"
#include "stability.hpp"
#include "trace.hpp"
#include "enumerate.hpp"
#include "io.hpp"
#include "experiments.hpp"
