#pragma once

#include "htcg/concentration.hpp"
#include "htcg/config.hpp"
#include "htcg/density.hpp"
#include "htcg/equilibrium.hpp"
#include "htcg/error.hpp"
#include "htcg/fluctuations.hpp"
#include "htcg/gibbs.hpp"
#include "htcg/io.hpp"
#include "htcg/parallel.hpp"
#include "htcg/rng.hpp"
#include "htcg/spectral.hpp"
#include "htcg/stats.hpp"
#include "htcg/torus.hpp"
#include "htcg/transport.hpp"
