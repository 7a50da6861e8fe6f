#pragma once

#include "sklc/centroid.hpp"
#include "sklc/classifier.hpp"
#include "sklc/corpus.hpp"
#include "sklc/corpus_io.hpp"
#include "sklc/divergence.hpp"
#include "sklc/error.hpp"
#include "sklc/evaluation.hpp"
#include "sklc/model_io.hpp"
