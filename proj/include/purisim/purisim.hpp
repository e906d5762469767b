#pragma once

#include "purisim/cartan.hpp"
#include "purisim/closed_dynamics.hpp"
#include "purisim/io.hpp"
#include "purisim/model.hpp"
#include "purisim/open_dynamics.hpp"
#include "purisim/parallel.hpp"
#include "purisim/purity_search.hpp"
#include "purisim/qubit_algebra.hpp"
