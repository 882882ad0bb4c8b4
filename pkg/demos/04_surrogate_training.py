"""Train a small surrogate end to end: sample, label, fit, evaluate, save.

This is a scaled-down run (600 samples, narrow window, small nets) that
finishes in about two minutes; use the CLI for full-size jobs.

Run from the repository root:  python demos/04_surrogate_training.py
"""

import json
import time

from gasrotor.surrogate import Hyperparams, generate_dataset, save_model
from gasrotor.surrogate.fit import evaluate_model, train_surrogate

# sampling window around the example design family (subset of the defaults)
RANGES = {
    "alpha": (0.35, 0.65), "beta_pi": (125 / 180, 155 / 180), "gamma": (0.6, 0.9),
    "hg_hr": (1.2, 3.0), "L_D": (1.0, 2.0), "Lambda": (0.5, 3.0),
    "m_bar": (0.1, 0.8), "It_bar": (0.03, 0.4), "Ip_It": (0.02, 0.3),
    "z1_bar": (-0.75, -0.4),
}

t0 = time.time()
dataset = generate_dataset(ranges=RANGES, n_samples=600, seed=1,
                           progress=lambda d, t: print(f"\rlabelling {d}/{t}",
                                                       end="", flush=True))
print(f"\ndataset: {len(dataset)} rows, {dataset.n_failed} oracle failures, "
      f"{time.time() - t0:.0f} s")

t0 = time.time()
model = train_surrogate(dataset, width=32, n_hidden=2,
                        hp=Hyperparams(learning_rate=2e-3, batch_size=32,
                                       epochs=400, patience=60),
                        seed=3,
                        progress=lambda d, t: print(f"\rtraining block {d}/{t}",
                                                    end="", flush=True))
print(f"\ntrained 16 ensemble blocks in {time.time() - t0:.0f} s")

metrics = evaluate_model(model, dataset, part="test")
print("\ntest-split metrics (pooled over the four modes):")
print(json.dumps(metrics["pooled"], indent=2))

save_model(model, "demo_model.grsm")
print("\nwrote demo_model.grsm")
