#pragma once

#include "sommerville/error.hpp"
#include "sommerville/params.hpp"
#include "sommerville/tessellation.hpp"
#include "sommerville/metrics.hpp"
#include "sommerville/validation.hpp"
#include "sommerville/optimize.hpp"
#include "sommerville/mesh_io.hpp"
