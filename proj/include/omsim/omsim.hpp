#pragma once

#include "omsim/app.hpp"
#include "omsim/config.hpp"
#include "omsim/constants.hpp"
#include "omsim/envelope.hpp"
#include "omsim/error.hpp"
#include "omsim/full_model.hpp"
#include "omsim/params.hpp"
#include "omsim/protocols.hpp"
#include "omsim/stability.hpp"
#include "omsim/steady_state.hpp"
#include "omsim/verification.hpp"
