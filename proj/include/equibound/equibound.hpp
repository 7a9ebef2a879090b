#pragma once

// Umbrella header: equivocation lower bounds from a MAP confusion matrix,
// the explicit channel construction that attains them, the brute-force
// verification harness, and the sample-based estimation pipeline.

#include "equibound/bounds.hpp"
#include "equibound/channel.hpp"
#include "equibound/confusion.hpp"
#include "equibound/estimation.hpp"
#include "equibound/io.hpp"
#include "equibound/oracle.hpp"
#include "equibound/rng.hpp"
