#pragma once

#include "stodyn/bandit.hpp"
#include "stodyn/concentration.hpp"
#include "stodyn/csv.hpp"
#include "stodyn/harness.hpp"
#include "stodyn/matrix.hpp"
#include "stodyn/pca.hpp"
#include "stodyn/rng.hpp"
#include "stodyn/schedule.hpp"
#include "stodyn/sgd.hpp"
#include "stodyn/stats.hpp"
#include "stodyn/toy.hpp"
