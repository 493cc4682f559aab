#pragma once

#include "qwalk/analysis.hpp"
#include "qwalk/config.hpp"
#include "qwalk/continuum.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/fft.hpp"
#include "qwalk/initcond.hpp"
#include "qwalk/io.hpp"
#include "qwalk/run.hpp"
#include "qwalk/spectral.hpp"
#include "qwalk/walk.hpp"
