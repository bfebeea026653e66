#pragma once

#include "homsample/errors.hpp"
#include "homsample/experiment.hpp"
#include "homsample/features.hpp"
#include "homsample/gnn.hpp"
#include "homsample/graph.hpp"
#include "homsample/graphon.hpp"
#include "homsample/io.hpp"
#include "homsample/random.hpp"
#include "homsample/sampling.hpp"
#include "homsample/spectral.hpp"
