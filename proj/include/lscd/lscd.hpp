#ifndef LSCD_LSCD_HPP
#define LSCD_LSCD_HPP

#include "lscd/align.hpp"
#include "lscd/common.hpp"
#include "lscd/cooc.hpp"
#include "lscd/corpus.hpp"
#include "lscd/eval.hpp"
#include "lscd/measures.hpp"
#include "lscd/pipeline.hpp"
#include "lscd/senses.hpp"
#include "lscd/sgns.hpp"
#include "lscd/spaces.hpp"

#endif  // LSCD_LSCD_HPP
