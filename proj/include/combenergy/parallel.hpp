// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace combenergy {

// Runtime switch for the OpenMP kernel paths. When disabled (or when built
// without OpenMP) the serial reference paths run. Output is identical either
// way; the parallel partitions never reorder per-entry accumulation.
void set_parallel_enabled(bool on);
bool parallel_enabled();
int hardware_threads();

}  // namespace combenergy
