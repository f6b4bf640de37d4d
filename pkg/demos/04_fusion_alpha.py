"""The learnable fusion weight moves toward whichever input carries the label."""

from topolesion.fusion import TrainConfig, synthetic_task, train

cfg = TrainConfig(epochs=60, reduced_dim=32, seed=0)
for informative in ("topo", "backbone"):
    vb, vt, y = synthetic_task(informative=informative, seed=1)
    model = train(vb, vt, y, cfg)
    first, last = model.trace[0], model.trace[-1]
    print(
        f"{informative:8s} informative: alpha {first.alpha:.3f} -> {last.alpha:.3f}, "
        f"accuracy {last.accuracy:.3f}, loss {last.loss:.4f}"
    )
