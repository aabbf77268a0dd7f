#pragma once

#include "domstab/errors.hpp"
#include "domstab/ingest.hpp"
#include "domstab/metrics.hpp"
#include "domstab/stability.hpp"
#include "domstab/models.hpp"
#include "domstab/least_squares.hpp"
#include "domstab/fitting.hpp"
#include "domstab/selection.hpp"
#include "domstab/dynamics.hpp"
#include "domstab/csv.hpp"
#include "domstab/svg.hpp"
#include "domstab/report.hpp"
