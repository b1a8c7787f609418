#pragma once

#include "gzsl/classifiers.hpp"
#include "gzsl/container_io.hpp"
#include "gzsl/dataset.hpp"
#include "gzsl/error.hpp"
#include "gzsl/eval.hpp"
#include "gzsl/fusion.hpp"
#include "gzsl/matrix.hpp"
#include "gzsl/model_io.hpp"
#include "gzsl/rng.hpp"
