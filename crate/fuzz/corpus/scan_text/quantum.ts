const kem = "ML-KEM-768"; // hybrid with X25519
