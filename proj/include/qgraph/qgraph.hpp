#pragma once

#include "qgraph/error.hpp"
#include "qgraph/linalg.hpp"
#include "qgraph/coupling.hpp"
#include "qgraph/scattering.hpp"
#include "qgraph/greens.hpp"
#include "qgraph/oracle.hpp"
#include "qgraph/approximation.hpp"
