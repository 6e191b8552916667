#pragma once

#include "qsum/centrality.hpp"
#include "qsum/corpus.hpp"
#include "qsum/error.hpp"
#include "qsum/evidence.hpp"
#include "qsum/pipeline.hpp"
#include "qsum/relevance.hpp"
#include "qsum/rouge.hpp"
