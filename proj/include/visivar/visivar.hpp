#pragma once

#include "visivar/curves.hpp"
#include "visivar/functionals.hpp"
#include "visivar/image.hpp"
#include "visivar/optimizer.hpp"
#include "visivar/pgm.hpp"
