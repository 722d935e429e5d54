#pragma once

#include "pcsemu/core.hpp"
#include "pcsemu/error.hpp"
#include "pcsemu/io.hpp"
#include "pcsemu/learner.hpp"
#include "pcsemu/metrics.hpp"
#include "pcsemu/pipeline.hpp"
#include "pcsemu/queue_sim.hpp"
