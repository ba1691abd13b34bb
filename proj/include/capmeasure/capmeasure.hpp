#pragma once

#include "capmeasure/capacity.hpp"
#include "capmeasure/error.hpp"
#include "capmeasure/gradient.hpp"
#include "capmeasure/hausdorff.hpp"
#include "capmeasure/median.hpp"
#include "capmeasure/parallel.hpp"
#include "capmeasure/params.hpp"
#include "capmeasure/result_io.hpp"
#include "capmeasure/space.hpp"
#include "capmeasure/space_io.hpp"
#include "capmeasure/verify.hpp"
