#!/usr/bin/env python
"""Show the version number of the source tree"""

from g2flow.version import SOURCE_VERSION

# Note: This format is for github actions
print(f"::set-output name=version::{SOURCE_VERSION}")
