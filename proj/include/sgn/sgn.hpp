#pragma once

#include "sgn/certificate_io.hpp"
#include "sgn/csv.hpp"
#include "sgn/error.hpp"
#include "sgn/games.hpp"
#include "sgn/integrators.hpp"
#include "sgn/markov.hpp"
#include "sgn/metric.hpp"
#include "sgn/mirror.hpp"
#include "sgn/parallel.hpp"
#include "sgn/region.hpp"
#include "sgn/region_spec.hpp"
#include "sgn/rng.hpp"
#include "sgn/small_gain.hpp"
