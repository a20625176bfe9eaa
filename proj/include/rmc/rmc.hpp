#pragma once

#include "rmc/corpus.hpp"
#include "rmc/embedder.hpp"
#include "rmc/encoding.hpp"
#include "rmc/error.hpp"
#include "rmc/eval.hpp"
#include "rmc/fusion.hpp"
#include "rmc/ranking.hpp"
#include "rmc/recommend.hpp"
#include "rmc/rng.hpp"
#include "rmc/serialization.hpp"
#include "rmc/sparse_index.hpp"
#include "rmc/sweep.hpp"
#include "rmc/synthetic.hpp"
#include "rmc/textproc.hpp"
#include "rmc/trainer.hpp"
