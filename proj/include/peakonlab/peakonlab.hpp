#pragma once

#include "peakonlab/numerics.hpp"
#include "peakonlab/circle_diffeo.hpp"
#include "peakonlab/ch_dynamics.hpp"
#include "peakonlab/reconstruction.hpp"
#include "peakonlab/peakon_closed_form.hpp"
#include "peakonlab/hill_monodromy.hpp"
