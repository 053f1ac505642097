#pragma once

#include <spikevol/errors.hpp>
#include <spikevol/grid.hpp>
#include <spikevol/params.hpp>
#include <spikevol/specfun.hpp>
#include <spikevol/volterra.hpp>
#include <spikevol/hawkes.hpp>
#include <spikevol/sve.hpp>
#include <spikevol/riccati.hpp>
#include <spikevol/harness.hpp>
