#pragma once

#include "anco/error.hpp"
#include "anco/spectrum.hpp"
#include "anco/phasespace.hpp"
#include "anco/coherent.hpp"
#include "anco/identity.hpp"
#include "anco/inversion.hpp"
#include "anco/io.hpp"
