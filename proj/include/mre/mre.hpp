#pragma once

#include "mre/model.hpp"
#include "mre/energy_model.hpp"
#include "mre/feasibility.hpp"
#include "mre/kkt.hpp"
#include "mre/solver.hpp"
#include "mre/schemes.hpp"
#include "mre/oracle.hpp"
#include "mre/dual_ascent.hpp"
