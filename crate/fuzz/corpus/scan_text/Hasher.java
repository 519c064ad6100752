MessageDigest md = MessageDigest.getInstance("SHA-256");
MessageDigest legacy = MessageDigest.getInstance("SHA1");
