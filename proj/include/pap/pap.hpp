#pragma once

#include "pap/baselines.hpp"
#include "pap/battery.hpp"
#include "pap/channel.hpp"
#include "pap/common.hpp"
#include "pap/env.hpp"
#include "pap/geometry.hpp"
#include "pap/metrics.hpp"
#include "pap/neuralnet.hpp"
#include "pap/power.hpp"
#include "pap/td3.hpp"
