#pragma once

#include "fiedler/dense_small.hpp"
#include "fiedler/laplacian.hpp"
#include "fiedler/matrix_market.hpp"
#include "fiedler/pcg.hpp"
#include "fiedler/reorder.hpp"
#include "fiedler/sparse_core.hpp"
#include "fiedler/spy_svg.hpp"
#include "fiedler/tracemin.hpp"
