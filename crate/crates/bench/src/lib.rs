//! Seeded input generators shared by the benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dockspec_core::{DockerSpec, PackageManager};

const OS: [&str; 6] = ["alpine", "ubuntu1804", "ubuntu2004", "debian10", "centos7", "any"];
const DEPS: [&str; 16] = [
    "git", "curl", "wget", "nginx", "python", "node", "redis", "vim", "gcc", "make", "jq", "flask",
    "tomcat", "ffmpeg", "openssl", "zip",
];
const PACKAGES: [&str; 10] = [
    "git", "curl", "wget", "vim", "gcc", "make", "jq", "zip", "unzip", "openssl",
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_spec(rng: &mut impl Rng) -> DockerSpec {
    let pms = [PackageManager::Apt, PackageManager::Apk, PackageManager::Yum, PackageManager::Any];
    let n = rng.gen_range(0..6);
    DockerSpec {
        os: OS.choose(rng).unwrap().to_string(),
        pkg_manager: *pms.choose(rng).unwrap(),
        dependencies: DEPS.choose_multiple(rng, n).map(|s| s.to_string()).collect(),
        downloads_external: rng.gen(),
        uses_env: rng.gen(),
        uses_arg: rng.gen(),
        uses_label: rng.gen(),
        uses_expose: rng.gen(),
        uses_cmd: rng.gen(),
        uses_entrypoint: rng.gen(),
    }
}

/// A plausible single-stage Dockerfile with `runs` RUN instructions.
pub fn random_dockerfile(rng: &mut impl Rng, runs: usize) -> String {
    let mut text = String::from("FROM ubuntu:20.04\n# install build tools\n");
    for _ in 0..runs {
        let n = rng.gen_range(1..6);
        let pkgs: Vec<&str> = PACKAGES.choose_multiple(rng, n).copied().collect();
        text.push_str(&format!(
            "RUN apt-get update && apt-get install -y {} && rm -rf /var/lib/apt/lists/*\n",
            pkgs.join(" ")
        ));
        if rng.gen_bool(0.3) {
            text.push_str("WORKDIR /app\n");
        }
    }
    text.push_str("CMD [\"bash\"]\n");
    text
}
