#pragma once

#include "shallowcvx/csv.hpp"
#include "shallowcvx/epigraph.hpp"
#include "shallowcvx/error.hpp"
#include "shallowcvx/geometry.hpp"
#include "shallowcvx/kernel.hpp"
#include "shallowcvx/minimize.hpp"
#include "shallowcvx/network.hpp"
#include "shallowcvx/rng.hpp"
#include "shallowcvx/sgd.hpp"
#include "shallowcvx/version.hpp"
