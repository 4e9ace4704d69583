#pragma once

#include "sigaudit/classify.hpp"
#include "sigaudit/corpus.hpp"
#include "sigaudit/errors.hpp"
#include "sigaudit/matcher.hpp"
#include "sigaudit/mutate.hpp"
#include "sigaudit/normalize.hpp"
#include "sigaudit/regex.hpp"
#include "sigaudit/report.hpp"
#include "sigaudit/stats.hpp"
#include "sigaudit/structural.hpp"
