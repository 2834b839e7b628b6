#pragma once

#include "beltway/error.hpp"
#include "beltway/linalg.hpp"
#include "beltway/rng.hpp"
#include "beltway/model.hpp"
#include "beltway/forward.hpp"
#include "beltway/preprocess.hpp"
#include "beltway/assemble.hpp"
#include "beltway/parallel.hpp"
#include "beltway/oracle.hpp"
#include "beltway/io.hpp"
#include "beltway/svg.hpp"
#include "beltway/experiment.hpp"
