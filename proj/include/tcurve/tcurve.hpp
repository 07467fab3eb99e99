#pragma once

#include "tcurve/extended.hpp"
#include "tcurve/space.hpp"
#include "tcurve/curve.hpp"
#include "tcurve/stieltjes.hpp"
#include "tcurve/convex.hpp"
#include "tcurve/modulus.hpp"
#include "tcurve/gradients.hpp"
#include "tcurve/io.hpp"
#include "tcurve/harness.hpp"
