"""Reference numbers produced by tests/oracles/derive_expected.py (mpmath, 40 digits)."""

EPS_RB = 0.0726453669024434
SIGMA0_RB_NM = 34.1028928949528
R_RB = 3.99999968000002e-8
NO0_RB = 8.81504690485146
VAR0_RB = 94.4603258848201

SIN2_073_1 = 0.221168376840104
SIN4_001_1 = 0.00421045644089347
SIN4_02_3 = 0.370885127048888
SIN2_GIBBS5_005 = 0.432332358381694
DW_073 = 0.557663246319791
VAR_RATIO_EXACT_OVER_LD = 0.853963282528505

ENVELOPE_G_EQ_K = 0.245837007000237
RATE_KT1E3_G001 = 9.97050879823529e-5
R_G001 = 9.99800029996e-5
RATE_KT1E3_G1 = 0.2496875
RATE_KT10_G1 = 0.218748095267794

NBAR0_NANO = 41.681236703602
MAX_SNR_NANO = 0.112818193250718
T_OPT_NANO_US = 66.3377485556159
N_EX_NANO = 1737325.4931417
MASSIVE_MAX_SNR_NANO = 0.112829019446666
MASSIVE_N_EX_NANO = 1736658.78809065
MASSIVE_T_OPT_NANO_US = 66.3250186566526
MAX_SNR_RB = 1.78412411615277
N_EX_RB = 25000.0

G_ATOM = 11936.6207318922
G_NANO = 197392088.021787

X_DEC_PI = 1.12566370614359
C_DEC_PI_OVER_2 = 0.04
X_TH_20 = 2.31871981585744
