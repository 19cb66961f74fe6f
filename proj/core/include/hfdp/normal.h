// Copyright 2026 The hfdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HFDP_NORMAL_H_
#define HFDP_NORMAL_H_

namespace hfdp {

// Standard normal density.
double NormalPdf(double x);

// Standard normal CDF, evaluated through erfc so that both tails keep full
// relative precision. Absolute error is below 1e-12 everywhere.
double NormalCdf(double x);

}  // namespace hfdp

#endif  // HFDP_NORMAL_H_
