// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "cloudreg/error.hpp"
#include "cloudreg/evaluation.hpp"
#include "cloudreg/filtering.hpp"
#include "cloudreg/geometry.hpp"
#include "cloudreg/io.hpp"
#include "cloudreg/kdtree.hpp"
#include "cloudreg/keyframe.hpp"
#include "cloudreg/map_pipeline.hpp"
#include "cloudreg/octree.hpp"
#include "cloudreg/offload.hpp"
#include "cloudreg/registration.hpp"
