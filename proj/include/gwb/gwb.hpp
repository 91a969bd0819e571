#pragma once

#include "gwb/barycenter.hpp"
#include "gwb/bounds.hpp"
#include "gwb/error.hpp"
#include "gwb/graphs.hpp"
#include "gwb/io.hpp"
#include "gwb/matrix.hpp"
#include "gwb/ot.hpp"
#include "gwb/parallel.hpp"
#include "gwb/quantile.hpp"
#include "gwb/rng.hpp"
#include "gwb/shapes.hpp"
#include "gwb/sliced.hpp"
#include "gwb/spaces.hpp"
#include "gwb/version.hpp"
