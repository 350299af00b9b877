// Copyright 2026 The Kettle Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KETTLE_KETTLE_HPP
#define KETTLE_KETTLE_HPP

#include "kettle/attestation.hpp"
#include "kettle/bundle.hpp"
#include "kettle/canonical_json.hpp"
#include "kettle/confidential.hpp"
#include "kettle/crypto.hpp"
#include "kettle/errors.hpp"
#include "kettle/lock_manifest.hpp"
#include "kettle/merkle.hpp"
#include "kettle/orchestrator.hpp"
#include "kettle/provenance.hpp"
#include "kettle/support.hpp"
#include "kettle/verifier.hpp"

#endif  // KETTLE_KETTLE_HPP
