#pragma once

#include "greenlink/assist.hpp"
#include "greenlink/cache.hpp"
#include "greenlink/common.hpp"
#include "greenlink/config.hpp"
#include "greenlink/efc.hpp"
#include "greenlink/matrix.hpp"
#include "greenlink/nullmodel.hpp"
#include "greenlink/panel.hpp"
#include "greenlink/pipeline.hpp"
#include "greenlink/rca.hpp"
#include "greenlink/report.hpp"
#include "greenlink/rng.hpp"
#include "greenlink/sections.hpp"
#include "greenlink/validate.hpp"
