#pragma once

// Umbrella header.

#include <string_view>

#include "spde/acceptance.hpp"
#include "spde/asymptotics.hpp"
#include "spde/bounds.hpp"
#include "spde/chaos.hpp"
#include "spde/classify.hpp"
#include "spde/errors.hpp"
#include "spde/kernel.hpp"
#include "spde/mittag_leffler.hpp"
#include "spde/model.hpp"
#include "spde/radial.hpp"
#include "spde/random.hpp"
#include "spde/sampler.hpp"
#include "spde/variational.hpp"

namespace spde {
inline constexpr std::string_view kVersion = "0.1.0";
}
