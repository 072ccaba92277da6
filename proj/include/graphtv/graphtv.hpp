#pragma once

#include "graphtv/delaunay.hpp"
#include "graphtv/error.hpp"
#include "graphtv/graph.hpp"
#include "graphtv/io.hpp"
#include "graphtv/objective.hpp"
#include "graphtv/oracle.hpp"
#include "graphtv/param_select.hpp"
#include "graphtv/region_forest.hpp"
#include "graphtv/schedule.hpp"
#include "graphtv/simulate.hpp"
#include "graphtv/solver.hpp"
