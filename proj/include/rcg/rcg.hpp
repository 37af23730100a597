#pragma once

/// Convenience include for the whole library.

#include "rcg/coalition.hpp"
#include "rcg/dynamics.hpp"
#include "rcg/energy.hpp"
#include "rcg/experiment.hpp"
#include "rcg/game.hpp"
#include "rcg/geometry.hpp"
#include "rcg/io.hpp"
#include "rcg/lp.hpp"
#include "rcg/network.hpp"
#include "rcg/profile.hpp"
