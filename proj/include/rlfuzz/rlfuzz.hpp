#pragma once

#include "rlfuzz/agent.hpp"
#include "rlfuzz/bench.hpp"
#include "rlfuzz/config.hpp"
#include "rlfuzz/dictionary.hpp"
#include "rlfuzz/errors.hpp"
#include "rlfuzz/input.hpp"
#include "rlfuzz/loop.hpp"
#include "rlfuzz/miniparser.hpp"
#include "rlfuzz/mutation.hpp"
#include "rlfuzz/qnet.hpp"
#include "rlfuzz/report.hpp"
#include "rlfuzz/rng.hpp"
#include "rlfuzz/sample_doc.hpp"
#include "rlfuzz/target.hpp"
#include "rlfuzz/trace.hpp"
