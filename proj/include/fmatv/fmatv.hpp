#pragma once

#include "fmatv/binary64.hpp"
#include "fmatv/denotation.hpp"
#include "fmatv/error_model.hpp"
#include "fmatv/ir.hpp"
#include "fmatv/parser.hpp"
#include "fmatv/printer.hpp"
#include "fmatv/refinement.hpp"
#include "fmatv/sampler.hpp"
#include "fmatv/upward.hpp"
#include "fmatv/value.hpp"
#include "fmatv/validator.hpp"
#include "fmatv/wellformed.hpp"
