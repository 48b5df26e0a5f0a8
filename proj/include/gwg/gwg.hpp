#pragma once

#include "mesh.hpp"
#include "quadrature.hpp"
#include "polybasis.hpp"
#include "weakspace.hpp"
#include "assembly.hpp"
#include "verify.hpp"
