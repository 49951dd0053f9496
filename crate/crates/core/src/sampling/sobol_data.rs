//! Sobol direction integers, 30-bit, for dimensions 1..=32.
//!
//! Precomputed from the Joe-Kuo `new-joe-kuo-6.21201` direction-number
//! table (first 32 dimensions) with the standard primitive-polynomial
//! recurrence; dimension 1 is the van der Corput sequence in base 2.

pub(crate) const MAX_DIM: usize = 32;
pub(crate) const BITS: u32 = 30;

pub(crate) const DIRECTIONS: [[u32; 30]; 32] = [
    [536870912, 268435456, 134217728, 67108864, 33554432, 16777216, 8388608, 4194304, 2097152, 1048576, 524288, 262144, 131072, 65536, 32768, 16384, 8192, 4096, 2048, 1024, 512, 256, 128, 64, 32, 16, 8, 4, 2, 1],
    [536870912, 805306368, 671088640, 1006632960, 570425344, 855638016, 713031680, 1069547520, 538968064, 808452096, 673710080, 1010565120, 572653568, 858980352, 715816960, 1073725440, 536879104, 805318656, 671098880, 1006648320, 570434048, 855651072, 713042560, 1069563840, 538976288, 808464432, 673720360, 1010580540, 572662306, 858993459],
    [536870912, 805306368, 402653184, 603979776, 973078528, 385875968, 595591168, 826277888, 438304768, 657457152, 999817216, 358875136, 538574848, 807862272, 406552576, 605372416, 975183872, 389033984, 597170176, 828646400, 437926400, 656873216, 1002152832, 357921088, 536885792, 805312304, 402662296, 603992420, 973085210, 385885991],
    [536870912, 805306368, 134217728, 335544320, 1040187392, 486539264, 679477248, 616562688, 908066816, 156237824, 376963072, 968097792, 503447552, 755171328, 545292288, 817971200, 136568832, 340905984, 1056606208, 494291968, 673276416, 609457408, 922347392, 158784320, 371195936, 961544240, 511180808, 766771220, 537002046, 805503005],
    [536870912, 268435456, 134217728, 738197504, 1040187392, 922746880, 511705088, 658505728, 379584512, 200278016, 676855808, 1009516544, 916586496, 468779008, 542670848, 271499264, 144826368, 754085888, 1054435328, 929870848, 503351808, 654495488, 377744768, 188970688, 681697312, 1022521360, 920217608, 460108844, 536906302, 268619575],
    [536870912, 268435456, 402653184, 201326592, 838860800, 150994944, 360710144, 1052770304, 941621248, 470810624, 706215936, 84672512, 665976832, 935919616, 766869504, 586072064, 301998080, 419434496, 226498560, 851446784, 169882112, 353372416, 1066931584, 1003241152, 529676320, 735648784, 128821784, 669173004, 900859826, 784934857],
    [536870912, 805306368, 671088640, 872415232, 369098752, 620756992, 260046848, 952107008, 799014912, 149946368, 126353408, 1019478016, 295567360, 434176000, 504463360, 555335680, 832446464, 702623744, 907126784, 354022400, 664679936, 216077568, 965846912, 769248448, 138287520, 68230640, 1041866760, 287174660, 429918270, 502268945],
    [536870912, 268435456, 671088640, 335544320, 570425344, 150994944, 75497472, 188743680, 497025024, 663748608, 34078720, 419692544, 747241472, 524615680, 1068007424, 781336576, 109649920, 306630656, 825059328, 954000384, 1033896448, 932184320, 705168000, 218366272, 243925536, 373620880, 992510024, 634536116, 455680474, 903271033],
    [536870912, 268435456, 671088640, 335544320, 167772160, 889192448, 444596224, 473956352, 236978176, 370147328, 981991424, 205783040, 640286720, 34930688, 814383104, 961101824, 1017946112, 508694528, 1051265024, 794608640, 103416320, 303366400, 411730560, 759775552, 917282976, 726799184, 606669224, 857523652, 134873826, 67436641],
    [536870912, 268435456, 939524096, 738197504, 637534208, 620756992, 578813952, 381681664, 216006656, 913309696, 478674944, 264503296, 812515328, 700121088, 350322688, 175980544, 42901504, 113946624, 887404544, 444587008, 982385152, 717947136, 317293440, 1064911552, 402694752, 1006744144, 504183336, 151428460, 76456654, 868921959],
    [536870912, 268435456, 671088640, 67108864, 33554432, 452984832, 662700032, 146800640, 367001600, 728760320, 535298048, 611581952, 308412416, 867500032, 570589184, 184795136, 260268032, 214298624, 401348608, 813575168, 946037248, 750121216, 126098048, 415902784, 1038180896, 795930800, 502175992, 1065217228, 903873406, 997196295],
    [536870912, 268435456, 134217728, 201326592, 369098752, 721420288, 629145600, 180355072, 891289600, 38797312, 950534144, 345243648, 327811072, 835125248, 413630464, 77185024, 461692928, 1036808192, 245770240, 798041088, 1041162752, 923496704, 998353024, 768140480, 111805280, 597099440, 672105176, 470663276, 504291890, 655061653],
    [536870912, 805306368, 671088640, 335544320, 1040187392, 587202560, 947912704, 213909504, 65011712, 139460608, 627572736, 396099584, 906100736, 118030336, 780500992, 1003339776, 90284032, 664530944, 503764992, 319628288, 277062144, 415429376, 1038834304, 727508288, 501219808, 458228016, 904397064, 257687948, 199361502, 744030901],
    [536870912, 805306368, 402653184, 603979776, 234881024, 822083584, 276824064, 683671552, 1012924416, 714080256, 1060634624, 558104576, 939655168, 335740928, 369197056, 352468992, 511762432, 432214016, 752945152, 38964224, 56346112, 198617344, 121238400, 893719616, 771751968, 16777264, 142606360, 213909540, 845152270, 462422065],
    [536870912, 268435456, 134217728, 1006632960, 704643072, 352321536, 645922816, 658505728, 127926272, 389021696, 524812288, 591659008, 153223168, 477167616, 988315648, 494387200, 451452928, 225726464, 317253632, 829731840, 954751488, 611771136, 510377088, 53989440, 432709664, 335892496, 109078536, 927167548, 262208042, 724742933],
    [536870912, 805306368, 134217728, 872415232, 905969664, 822083584, 293601280, 557842432, 694157312, 498073600, 728236032, 447479808, 191496192, 716111872, 57311232, 514605056, 896131072, 800018432, 619247616, 250430464, 227175936, 324837120, 652269696, 166802880, 764046880, 593272624, 786487432, 1039218164, 462056982, 308059905],
    [536870912, 268435456, 134217728, 1006632960, 234881024, 83886080, 1031798784, 432013312, 601882624, 336592896, 581435392, 66846720, 78249984, 721223680, 1059749888, 171884544, 793403392, 49188864, 327268352, 214109184, 375490048, 835931392, 256584832, 317502144, 461473312, 818105616, 409152648, 886092540, 852198958, 187583765],
    [536870912, 805306368, 134217728, 1006632960, 436207616, 419430400, 226492416, 457179136, 274726912, 940572672, 884473856, 654049280, 54132736, 348061696, 383418368, 200065024, 671293440, 201412608, 302118912, 621011968, 394296832, 37987584, 501388672, 592468672, 618298912, 518825264, 931141000, 843094780, 367222330, 525530409],
    [536870912, 268435456, 671088640, 335544320, 637534208, 1023410176, 729808896, 784334848, 970981376, 628097024, 117964800, 873201664, 921305088, 360513536, 1071677440, 141574144, 76079104, 248418304, 688576512, 218905600, 325690880, 314374912, 193007232, 1052936128, 299976224, 829582096, 554423976, 151960532, 493412358, 1002344493],
    [536870912, 805306368, 939524096, 738197504, 771751936, 251658240, 864026624, 272629760, 140509184, 342884352, 39321600, 559677440, 1016987648, 598147072, 402685952, 469811200, 369156096, 587247616, 494974976, 524303360, 1004588544, 70271232, 171450752, 892096960, 1053165920, 50038128, 614363768, 1067929244, 234881026, 1056964611],
    [536870912, 805306368, 939524096, 872415232, 436207616, 251658240, 578813952, 339738624, 710934528, 930086912, 384303104, 242483200, 629014528, 364183552, 41975808, 608223232, 308338688, 57724928, 216557568, 24394752, 134121984, 32854272, 685779328, 321920448, 76069792, 218425808, 697761272, 348220116, 92143618, 632619011],
    [536870912, 268435456, 402653184, 872415232, 234881024, 587202560, 528482304, 473956352, 840957952, 19922944, 115867648, 786169856, 312868864, 820969472, 696287232, 457195520, 1000366080, 175165440, 625489920, 279743488, 971931136, 54751488, 267274368, 71517376, 107936672, 251865968, 634294936, 829677500, 243662850, 48168961],
    [536870912, 805306368, 671088640, 603979776, 33554432, 419430400, 444596224, 574619648, 694157312, 852492288, 101187584, 727973888, 736231424, 482148352, 157319168, 47235072, 772317184, 258248704, 702679040, 96297984, 333507072, 546326784, 124257664, 1035230016, 803868704, 786024848, 939672968, 1009597428, 235446274, 1063555075],
    [536870912, 805306368, 134217728, 872415232, 301989888, 587202560, 897581056, 239075328, 895483904, 210763776, 749207552, 478412800, 351666176, 548601856, 853573632, 298893312, 608706560, 710201344, 524175360, 329747456, 1061049856, 598210816, 926840192, 396829248, 624843424, 883420688, 280915416, 988227532, 635314178, 913821699],
    [536870912, 805306368, 134217728, 335544320, 905969664, 1023410176, 260046848, 624951296, 601882624, 256901120, 1019740160, 196870144, 728891392, 42139648, 583565312, 314359808, 452075520, 247681024, 950556672, 95171584, 173678080, 795854080, 217241472, 63113536, 1059613984, 887892976, 532339272, 490705740, 1069161986, 759153923],
    [536870912, 268435456, 671088640, 738197504, 637534208, 687865856, 511705088, 893386752, 10485760, 403701760, 343408640, 572260352, 587857920, 301006848, 49840128, 727465984, 766156800, 216117248, 771758080, 352379904, 276879872, 809526528, 941660800, 72401984, 173550560, 256662896, 936545960, 738011012, 898292226, 414278913],
    [536870912, 805306368, 671088640, 201326592, 100663296, 218103808, 578813952, 658505728, 434110464, 546308096, 272105472, 406585344, 609353728, 173080576, 190349312, 804044800, 92971008, 1056780288, 959617024, 813822976, 134261248, 1006660864, 771809152, 16811584, 612422368, 708889072, 996179144, 131085828, 165153282, 950820099],
    [536870912, 268435456, 939524096, 872415232, 33554432, 318767104, 8388608, 759169024, 228589568, 816840704, 84410368, 30670848, 117309440, 336396288, 304644096, 723795968, 886497280, 791269376, 519997440, 806161408, 673735168, 203695360, 911662720, 292118208, 333356576, 771604048, 545279864, 1027651572, 899711490, 78705921],
    [536870912, 805306368, 939524096, 335544320, 436207616, 318767104, 494927872, 1035993088, 228589568, 902823936, 569901056, 1003225088, 686424064, 894500864, 149585920, 89243648, 820666368, 290557952, 719980544, 38919168, 929725952, 1066478336, 986335360, 172096576, 456314720, 831329136, 869821640, 81577524, 993185634, 26022771],
    [536870912, 268435456, 402653184, 603979776, 838860800, 486539264, 343932928, 12582912, 987758592, 466616320, 421003264, 918290432, 98959360, 173998080, 694583296, 1050624000, 965140480, 474992640, 102639616, 926131200, 764967424, 645703424, 654709120, 898598976, 41850336, 354648752, 685779576, 382750668, 362321378, 310149809],
    [536870912, 805306368, 671088640, 872415232, 771751936, 16777216, 461373440, 633339904, 1017118720, 997195776, 81264640, 388235264, 919994368, 209256448, 41320448, 856276992, 11411456, 288165888, 66623488, 966005760, 648967680, 338510592, 511222912, 693419712, 797847520, 194901584, 1031799480, 549471412, 555749346, 733013587],
    [536870912, 805306368, 939524096, 201326592, 436207616, 989855744, 142606336, 180355072, 228589568, 659554304, 445120512, 94109696, 326762496, 214106112, 618299392, 546553856, 248668160, 600829952, 168298496, 861674496, 1020963328, 479459072, 752024704, 349149760, 411573920, 43798576, 972724552, 822305852, 1006272162, 906207283],
];
