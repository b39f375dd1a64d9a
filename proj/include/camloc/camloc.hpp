#pragma once

#include "camloc/cam.hpp"
#include "camloc/export.hpp"
#include "camloc/image_io.hpp"
#include "camloc/imaging.hpp"
#include "camloc/layers.hpp"
#include "camloc/metrics.hpp"
#include "camloc/network.hpp"
#include "camloc/optimizer.hpp"
#include "camloc/region.hpp"
#include "camloc/rng.hpp"
#include "camloc/synth.hpp"
#include "camloc/tensor.hpp"
