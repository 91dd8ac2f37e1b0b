#ifndef WUM_WUM_HPP
#define WUM_WUM_HPP

#include "wum/core.hpp"
#include "wum/digest.hpp"
#include "wum/log_ingest.hpp"
#include "wum/preprocess.hpp"
#include "wum/page_registry.hpp"
#include "wum/sessions.hpp"
#include "wum/pattern_miner.hpp"
#include "wum/knowledge_base.hpp"
#include "wum/recommender.hpp"
#include "wum/evaluator.hpp"
#include "wum/config.hpp"

#endif
