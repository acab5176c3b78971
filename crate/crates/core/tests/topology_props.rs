use pimdb_core::config::DramConfig;
use pimdb_core::topology::{compose_address, decompose_address, deinterleave_cacheline, pim_page_bytes, pim_page_count, reinterleave};
use proptest::prelude::*;

#[test]
fn default_page_arithmetic() {
    let cfg = DramConfig::default();
    assert_eq!(pim_page_bytes(&cfg), 4_194_304);
    assert_eq!(pim_page_count(2_400_152_584, &cfg), 573);
    assert_eq!(pim_page_count(0, &cfg), 0);
    assert_eq!(pim_page_count(1, &cfg), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn address_mapping_is_a_bijection(addr in any::<u64>()) {
        let cfg = DramConfig::default();
        let addr = (addr % cfg.total_capacity_bytes()) & !7;
        let parts = decompose_address(&cfg, addr).unwrap();
        prop_assert_eq!(compose_address(&cfg, &parts).unwrap(), addr);
        prop_assert!(parts.channel < cfg.channels && parts.rank < cfg.ranks_per_channel);
        prop_assert!(parts.chip < cfg.chips_per_rank);
    }

    #[test]
    fn deinterleave_round_trips(line in prop::collection::vec(any::<u8>(), 64)) {
        let cfg = DramConfig::default();
        let layout = deinterleave_cacheline(&line, &cfg).unwrap();
        prop_assert_eq!(reinterleave(&layout), line);
    }
}

#[test]
fn out_of_range_address_is_rejected() {
    let cfg = DramConfig::default();
    assert!(decompose_address(&cfg, cfg.total_capacity_bytes()).is_err());
}

#[test]
fn unaligned_address_is_rejected() {
    assert!(decompose_address(&DramConfig::default(), 9).is_err());
}
