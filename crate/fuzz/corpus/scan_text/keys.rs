let key = RsaPrivateKey::new(&mut rng, 2048)?; // RSA-2048
let signer = ed25519::SigningKey::from(seed);
