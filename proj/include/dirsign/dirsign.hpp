#pragma once

#include "dirsign/error.hpp"
#include "dirsign/tensor.hpp"
#include "dirsign/tensor_io.hpp"
#include "dirsign/dsl.hpp"
#include "dirsign/persistence.hpp"
#include "dirsign/assignment.hpp"
#include "dirsign/wasserstein.hpp"
#include "dirsign/correlation.hpp"
#include "dirsign/calibration.hpp"
#include "dirsign/datasets.hpp"
#include "dirsign/evaluation.hpp"
#include "dirsign/autoencoder.hpp"
#include "dirsign/demo.hpp"
#include "dirsign/bench.hpp"
