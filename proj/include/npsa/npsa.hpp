#pragma once

#include "npsa/coskewness.hpp"
#include "npsa/eigensearch.hpp"
#include "npsa/error.hpp"
#include "npsa/io.hpp"
#include "npsa/linalg.hpp"
#include "npsa/metrics.hpp"
#include "npsa/pipeline.hpp"
#include "npsa/report.hpp"
#include "npsa/synthetic.hpp"
#include "npsa/tensor3.hpp"
#include "npsa/verify.hpp"
#include "npsa/whitening.hpp"
