#pragma once

#include <jsm/color.hpp>
#include <jsm/decomposition.hpp>
#include <jsm/depth.hpp>
#include <jsm/error.hpp>
#include <jsm/guided_filter.hpp>
#include <jsm/image.hpp>
#include <jsm/image_io.hpp>
#include <jsm/metrics.hpp>
#include <jsm/parallax.hpp>
#include <jsm/pipeline.hpp>
#include <jsm/resample.hpp>
#include <jsm/retargeting.hpp>
#include <jsm/synthetic.hpp>
