// qpump.hpp — umbrella header.

#pragma once

#include "qpump/config.hpp"
#include "qpump/distribution.hpp"
#include "qpump/linalg.hpp"
#include "qpump/model.hpp"
#include "qpump/otm.hpp"
#include "qpump/ttm.hpp"
