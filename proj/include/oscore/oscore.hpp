#pragma once

#include "oscore/common.hpp"
#include "oscore/field.hpp"
#include "oscore/fft.hpp"
#include "oscore/ndfield_io.hpp"
#include "oscore/bspline.hpp"
#include "oscore/wavelets.hpp"
#include "oscore/ostransform.hpp"
#include "oscore/se2ops.hpp"
#include "oscore/vesselness.hpp"
#include "oscore/segmentation.hpp"
#include "oscore/phantom.hpp"
#include "oscore/imageio.hpp"
#include "oscore/evaluation.hpp"
#include "oscore/config.hpp"
