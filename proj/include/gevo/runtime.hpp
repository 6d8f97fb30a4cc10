#pragma once

// Everything generated headers need.

#include "gevo/dyn.hpp"
#include "gevo/gen.hpp"
#include "gevo/graph.hpp"
#include "gevo/sampler.hpp"
#include "gevo/staticrt.hpp"
#include "gevo/util.hpp"
#include "gevo/visit.hpp"
