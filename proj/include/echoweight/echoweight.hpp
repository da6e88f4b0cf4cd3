#pragma once

#include "echoweight/config.hpp"
#include "echoweight/corpus.hpp"
#include "echoweight/encode.hpp"
#include "echoweight/error.hpp"
#include "echoweight/eval.hpp"
#include "echoweight/model.hpp"
#include "echoweight/participation.hpp"
#include "echoweight/split.hpp"
#include "echoweight/stats.hpp"
#include "echoweight/synth.hpp"
#include "echoweight/weighting.hpp"
