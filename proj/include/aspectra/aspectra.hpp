#pragma once

#include "aspectra/config.hpp"
#include "aspectra/corpus.hpp"
#include "aspectra/error.hpp"
#include "aspectra/evaluation.hpp"
#include "aspectra/features.hpp"
#include "aspectra/graph.hpp"
#include "aspectra/random.hpp"
#include "aspectra/sparse.hpp"
#include "aspectra/spreading.hpp"
#include "aspectra/stopwords.hpp"
#include "aspectra/summary.hpp"
#include "aspectra/text.hpp"
