#pragma once

#include "gsom/csv.hpp"
#include "gsom/dataset.hpp"
#include "gsom/error.hpp"
#include "gsom/io.hpp"
#include "gsom/macroclass.hpp"
#include "gsom/partition.hpp"
#include "gsom/quality.hpp"
#include "gsom/rng.hpp"
#include "gsom/som.hpp"
#include "gsom/svg.hpp"
#include "gsom/topology.hpp"
#include "gsom/trajectory.hpp"
