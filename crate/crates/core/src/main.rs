// Copyright 2026 loqs Contributors
// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(loqs::cli::run());
}
