#pragma once

// Umbrella header for the whole library.

#include "scax/abstraction.hpp"
#include "scax/alignment.hpp"
#include "scax/common.hpp"
#include "scax/domain.hpp"
#include "scax/expr.hpp"
#include "scax/intervention.hpp"
#include "scax/io.hpp"
#include "scax/restriction.hpp"
#include "scax/scm.hpp"
#include "scax/tau.hpp"
