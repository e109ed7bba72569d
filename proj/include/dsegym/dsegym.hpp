#pragma once

#include "dsegym/agents.hpp"
#include "dsegym/core.hpp"
#include "dsegym/dataset.hpp"
#include "dsegym/envs.hpp"
#include "dsegym/orchestrator.hpp"
#include "dsegym/proxy.hpp"
#include "dsegym/spaces.hpp"
