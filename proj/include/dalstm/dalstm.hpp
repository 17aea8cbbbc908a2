#pragma once

#include "dalstm/error.hpp"
#include "dalstm/ingest.hpp"
#include "dalstm/density.hpp"
#include "dalstm/divergence.hpp"
#include "dalstm/drift.hpp"
#include "dalstm/forecaster.hpp"
#include "dalstm/hpo.hpp"
#include "dalstm/eval.hpp"
#include "dalstm/pipeline.hpp"
