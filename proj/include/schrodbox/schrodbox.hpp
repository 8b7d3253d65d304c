#pragma once

#include "schrodbox/boundaries.hpp"
#include "schrodbox/cli.hpp"
#include "schrodbox/config.hpp"
#include "schrodbox/config_io.hpp"
#include "schrodbox/constants.hpp"
#include "schrodbox/errors.hpp"
#include "schrodbox/field.hpp"
#include "schrodbox/grid.hpp"
#include "schrodbox/hamiltonians.hpp"
#include "schrodbox/integrator.hpp"
#include "schrodbox/packets.hpp"
#include "schrodbox/potential.hpp"
#include "schrodbox/reference.hpp"
#include "schrodbox/report.hpp"
#include "schrodbox/trajectory.hpp"
