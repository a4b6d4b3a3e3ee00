#pragma once

#include "homd/error.hpp"
#include "homd/fields.hpp"
#include "homd/linear_solve.hpp"
#include "homd/mesh.hpp"
#include "homd/mesh_io.hpp"
#include "homd/metrics.hpp"
#include "homd/noise.hpp"
#include "homd/normal_filter.hpp"
#include "homd/operators.hpp"
#include "homd/parallel.hpp"
#include "homd/vertex_update.hpp"
