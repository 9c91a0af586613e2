"""Fleet-level byte accounting: direct unicasts versus a fog relay.

Ten devices each share a 1 kB model update with the other nine. Relaying
through the fog node costs one raw upload per sender but lets every copy
travel compressed, so the break-even depends only on the compression
factor alpha and the receiver count. The script sweeps alpha, prints the
savings ratio curve, and shows the per-device routing rule flipping.
"""

from rinr.comm import (
    DeviceProfile,
    Route,
    fog_total,
    optimize_routes,
    route_decision,
    serverless_total,
    training_location,
    transfer_time,
)

FLEET = [DeviceProfile(f"dev{i}", 1000, 9) for i in range(10)]


def main():
    print(f"fleet: 10 devices, 1000-byte payloads, all-to-all "
          f"(serverless total {serverless_total(FLEET)} bytes)")

    print("alpha   fog-devices   total-bytes   ratio")
    for alpha in ("0.083", "0.18", "0.5", "0.89", "0.95"):
        plan = optimize_routes(FLEET, alpha)
        report = fog_total(FLEET, plan)
        print(f"{alpha:>5}   {plan.fog_count:11d}   {report.d_f:11d}   "
              f"{report.ratio:.4f}")

    # The per-device rule is a pure threshold on the receiver count:
    # relay when (1 - alpha) * n > 1.
    print("\nreceivers needed to justify the relay:")
    for alpha in ("0.2", "0.5", "0.8"):
        flip = next(
            n for n in range(1, 100) if route_decision(n, alpha) is Route.FOG
        )
        print(f"  alpha {alpha}: direct up to {flip - 1} receivers, "
              f"fog from {flip}")

    # Byte-exact accounting keeps tiny payloads honest: with one-byte
    # payloads the compressed copy rounds up to a full byte, so the relay
    # never pays for itself even though the idealized rule says it should.
    tiny = [DeviceProfile("tiny", 1, 9)]
    plan = optimize_routes(tiny, "0.1")
    print(f"\n1-byte payload, alpha 0.1: idealized rule says "
          f"{route_decision(9, '0.1').name}, optimizer routes "
          f"{plan.routes['tiny'].name}")

    # Where to train a 6 MB refinement when the training data weighs 98.8 MB:
    # shipping the model both ways is cheaper than shipping the data.
    site = training_location(98_800_000, 6_000_000)
    secs = transfer_time(2 * 6_000_000, plan)
    print(f"98.8 MB data vs 6 MB model: train at {site.name} "
          f"(model round trip {secs:.1f} s at the default bandwidth)")


if __name__ == "__main__":
    main()
