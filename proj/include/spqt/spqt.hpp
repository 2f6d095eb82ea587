#pragma once

#include "spqt/autotune.hpp"
#include "spqt/bench.hpp"
#include "spqt/common.hpp"
#include "spqt/container.hpp"
#include "spqt/fp16.hpp"
#include "spqt/gemv.hpp"
#include "spqt/io.hpp"
#include "spqt/matrix.hpp"
#include "spqt/report.hpp"
#include "spqt/scan.hpp"
#include "spqt/superblock.hpp"
#include "spqt/synth.hpp"
#include "spqt/thread_pool.hpp"
#include "spqt/threshold.hpp"
