#ifndef SPCA_SLR_SPCA_SLR_HPP
#define SPCA_SLR_SPCA_SLR_HPP

#include "spca_slr/baselines.hpp"
#include "spca_slr/detect.hpp"
#include "spca_slr/errors.hpp"
#include "spca_slr/harness.hpp"
#include "spca_slr/model.hpp"
#include "spca_slr/parallel.hpp"
#include "spca_slr/rng.hpp"
#include "spca_slr/sampler.hpp"
#include "spca_slr/slr.hpp"
#include "spca_slr/types.hpp"

#endif
