#pragma once

// Umbrella header: the whole pipeline in dependency order.

#include "locpir/bytes.hpp"
#include "locpir/torus.hpp"
#include "locpir/gate_engine.hpp"
#include "locpir/codec.hpp"
#include "locpir/parallel.hpp"
#include "locpir/circuits.hpp"
#include "locpir/dataset.hpp"
#include "locpir/protocol.hpp"
#include "locpir/net.hpp"
#include "locpir/bench.hpp"
