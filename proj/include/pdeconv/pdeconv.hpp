#pragma once

// Umbrella header for the Poisson deconvolution library.

#include "pdeconv/ablation.hpp"
#include "pdeconv/bench.hpp"
#include "pdeconv/config.hpp"
#include "pdeconv/denoise.hpp"
#include "pdeconv/errors.hpp"
#include "pdeconv/fft.hpp"
#include "pdeconv/image.hpp"
#include "pdeconv/io.hpp"
#include "pdeconv/metrics.hpp"
#include "pdeconv/rng.hpp"
#include "pdeconv/solvers.hpp"
#include "pdeconv/spectral.hpp"
#include "pdeconv/suite.hpp"
#include "pdeconv/synth.hpp"
#include "pdeconv/tune.hpp"
#include "pdeconv/vst.hpp"
