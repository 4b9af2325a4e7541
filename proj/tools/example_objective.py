#!/usr/bin/env python3
"""Toy black box: reads one JSON line of parameters, prints one JSON line."""
import json
import math
import sys

params = json.loads(sys.stdin.readline())
lr = params["learning_rate"]
momentum = params["momentum"]
accuracy = 0.9 - 0.05 * (math.log10(lr) + 2.0) ** 2 - 0.5 * (momentum - 0.9) ** 2
print("epoch 1 done", file=sys.stderr)
print(json.dumps({"objective": accuracy}))
